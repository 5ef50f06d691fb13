//! Exact integer linear algebra and finitely generated abelian groups.
//!
//! Elements are row vectors throughout: a homomorphism is a matrix whose
//! rows are the images of the source generators, and a lattice is the row
//! space of a matrix.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn diagonal(entries: &[BigInt]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    /// Builds a matrix from rows; `cols` is needed when there are no rows.
    pub fn from_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix");
            data.extend(row);
        }
        IntMatrix {
            rows: r,
            cols,
            data,
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
            cols,
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<BigInt> {
        self.row(i).to_vec()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row_vec(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Row vector times matrix.
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.rows, "dimension mismatch");
        let mut out = vec![BigInt::zero(); self.cols];
        for (i, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let m = &self[(i, j)];
                if !m.is_zero() {
                    *o += x * m;
                }
            }
        }
        out
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        IntMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        Self::from_rows(idx.iter().map(|&i| self.row_vec(i)).collect(), self.cols)
    }

    pub fn select_cols(&self, idx: &[usize]) -> IntMatrix {
        let mut out = Self::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                out[(i, k)] = self[(i, j)].clone();
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] -= q * row[src]
    fn row_submul(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = &self.data[src * self.cols + j];
            if !s.is_zero() {
                let t = s * q;
                self.data[dst * self.cols + j] -= t;
            }
        }
    }

    /// col[dst] -= q * col[src]
    fn col_submul(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + src];
            if !s.is_zero() {
                let t = s * q;
                self.data[i * self.cols + dst] -= t;
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = &mut self.data[r * self.cols + j];
            *v = -std::mem::take(v);
        }
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(i) => {
                        m.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)]) / &prev;
                    m[(i, j)] = v;
                }
            }
            prev = m[(k, k)].clone();
        }
        sign * &m[(n - 1, n - 1)]
    }

    /// Rank of the row lattice.
    pub fn rank(&self) -> usize {
        let (h, _) = hnf(self);
        (0..h.rows)
            .filter(|&i| h.row(i).iter().any(|x| !x.is_zero()))
            .count()
    }

    /// Inverse of a unimodular matrix.
    pub fn unimodular_inverse(&self) -> Option<IntMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let (h, u) = hnf(self);
        if h == IntMatrix::identity(self.rows) {
            Some(u)
        } else {
            None
        }
    }
}

/// Row Hermite normal form: returns `(h, u)` with `u` unimodular and
/// `u * m = h`. Nonzero rows of `h` come first, pivots are positive and
/// the entries above each pivot lie in `[0, pivot)`.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        loop {
            // smallest nonzero entry in column c at or below row r
            let mut best: Option<usize> = None;
            for i in r..m.rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                match best {
                    Some(b) if h[(b, c)].abs() <= h[(i, c)].abs() => {}
                    _ => best = Some(i),
                }
            }
            let Some(b) = best else { break };
            h.swap_rows(r, b);
            u.swap_rows(r, b);
            let mut clean = true;
            for i in r + 1..m.rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = h[(i, c)].div_floor(&h[(r, c)]);
                h.row_submul(i, r, &q);
                u.row_submul(i, r, &q);
                if !h[(i, c)].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        for i in 0..r {
            let q = h[(i, c)].div_floor(&h[(r, c)]);
            h.row_submul(i, r, &q);
            u.row_submul(i, r, &q);
        }
        r += 1;
    }
    (h, u)
}

/// Row HNF with the zero rows removed.
pub fn hnf_basis(m: &IntMatrix) -> IntMatrix {
    let (h, _) = hnf(m);
    let keep: Vec<usize> = (0..h.rows)
        .filter(|&i| h.row(i).iter().any(|x| !x.is_zero()))
        .collect();
    h.select_rows(&keep)
}

/// Reduces `v` modulo the row lattice of `h` (which must be in HNF).
/// Returns the remainder and the coefficients `t` with `v = t * h + rem`.
pub fn hnf_reduce(v: &[BigInt], h: &IntMatrix) -> (Vec<BigInt>, Vec<BigInt>) {
    let mut rem = v.to_vec();
    let mut coeffs = vec![BigInt::zero(); h.rows];
    for i in 0..h.rows {
        let Some(c) = h.row(i).iter().position(|x| !x.is_zero()) else {
            continue;
        };
        let q = rem[c].div_floor(&h[(i, c)]);
        if !q.is_zero() {
            for (j, r) in rem.iter_mut().enumerate() {
                let hij = &h[(i, j)];
                if !hij.is_zero() {
                    *r -= &q * hij;
                }
            }
            coeffs[i] = q;
        }
    }
    (rem, coeffs)
}

/// Smith normal form: returns `(d, l, r)` with `l * m * r = d`, `l` and `r`
/// unimodular, `d` diagonal with nonnegative entries `d_1 | d_2 | ...`
/// (zeros last).
pub fn snf(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let mut d = m.clone();
    let mut l = IntMatrix::identity(m.rows);
    let mut r = IntMatrix::identity(m.cols);
    let n = m.rows.min(m.cols);
    for t in 0..n {
        loop {
            // smallest nonzero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..m.rows {
                for j in t..m.cols {
                    if d[(i, j)].is_zero() {
                        continue;
                    }
                    match best {
                        Some((bi, bj)) if d[(bi, bj)].abs() <= d[(i, j)].abs() => {}
                        _ => best = Some((i, j)),
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return (d, l, r);
            };
            d.swap_rows(t, bi);
            l.swap_rows(t, bi);
            d.swap_cols(t, bj);
            r.swap_cols(t, bj);

            let mut clean = true;
            for i in t + 1..m.rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = d[(i, t)].div_floor(&d[(t, t)]);
                d.row_submul(i, t, &q);
                l.row_submul(i, t, &q);
                if !d[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..m.cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = d[(t, j)].div_floor(&d[(t, t)]);
                d.col_submul(j, t, &q);
                r.col_submul(j, t, &q);
                if !d[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let mut bad_row = None;
            'outer: for i in t + 1..m.rows {
                for j in t + 1..m.cols {
                    if !d[(i, j)].is_multiple_of(&d[(t, t)]) {
                        bad_row = Some(i);
                        break 'outer;
                    }
                }
            }
            match bad_row {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    d.row_submul(t, i, &minus_one);
                    l.row_submul(t, i, &minus_one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            l.negate_row(t);
        }
    }
    (d, l, r)
}

/// Lattice of `x` with `x * m ≡ 0` modulo `mods` (columnwise; a modulus of
/// zero means exact vanishing). Returned as HNF rows.
pub fn lattice_kernel(m: &IntMatrix, mods: &[BigInt]) -> IntMatrix {
    assert_eq!(m.cols, mods.len());
    let r = m.rows;
    let t = m.cols;
    let top = m.hstack(&IntMatrix::identity(r));
    let active: Vec<&BigInt> = mods.iter().filter(|d| !d.is_zero()).collect();
    let mut bottom = IntMatrix::zeros(active.len(), t + r);
    let mut k = 0;
    for (j, d) in mods.iter().enumerate() {
        if !d.is_zero() {
            bottom[(k, j)] = d.clone();
            k += 1;
        }
    }
    let (h, _) = hnf(&top.vstack(&bottom));
    let mut rows = Vec::new();
    for i in 0..h.rows {
        let row = h.row(i);
        if row[..t].iter().all(Zero::is_zero) && row[t..].iter().any(|x| !x.is_zero()) {
            rows.push(row[t..].to_vec());
        }
    }
    hnf_basis(&IntMatrix::from_rows(rows, r))
}

/// A finitely generated abelian group `⊕ Z/d_i` in canonical form together
/// with the presentation it was computed from.
#[derive(Clone, PartialEq, Eq)]
pub struct FgAbGroup {
    invariants: Vec<BigInt>,
    ngens: usize,
    relations: IntMatrix,
    to_canon: IntMatrix,
    from_canon: IntMatrix,
}

impl fmt::Debug for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariants.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .invariants
            .iter()
            .map(|d| {
                if d.is_zero() {
                    "Z".to_string()
                } else {
                    format!("Z/{}", d)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl FgAbGroup {
    /// The group on `ngens` generators modulo the rows of `relations`.
    pub fn from_presentation(ngens: usize, relations: &IntMatrix) -> Self {
        assert_eq!(
            relations.cols, ngens,
            "relations must have one column per generator"
        );
        let (d, _, r) = snf(relations);
        let mut diag = Vec::with_capacity(ngens);
        for t in 0..ngens {
            if t < d.rows {
                diag.push(d[(t, t)].clone());
            } else {
                diag.push(BigInt::zero());
            }
        }
        let r_inv = r
            .unimodular_inverse()
            .expect("snf column transform is unimodular");
        let keep: Vec<usize> = (0..ngens).filter(|&t| !diag[t].is_one()).collect();
        FgAbGroup {
            invariants: keep.iter().map(|&t| diag[t].clone()).collect(),
            ngens,
            relations: relations.clone(),
            to_canon: r.select_cols(&keep),
            from_canon: r_inv.select_rows(&keep),
        }
    }

    /// `⊕ Z/d_i` for a list that is already a divisibility chain.
    pub fn from_invariants(invariants: &[BigInt]) -> Self {
        let n = invariants.len();
        Self::from_presentation(n, &IntMatrix::diagonal(invariants))
    }

    pub fn trivial() -> Self {
        Self::from_presentation(0, &IntMatrix::zeros(0, 0))
    }

    pub fn free(rank: usize) -> Self {
        Self::from_presentation(rank, &IntMatrix::zeros(0, rank))
    }

    /// `Z/n_1 ⊕ Z/n_2 ⊕ ...` for arbitrary cyclic orders (0 = infinite).
    pub fn from_cyclic_orders(orders: &[BigInt]) -> Self {
        Self::from_presentation(orders.len(), &IntMatrix::diagonal(orders))
    }

    /// Direct sum; its presentation generators are the concatenated
    /// canonical generators of the summands.
    pub fn direct_sum(parts: &[&FgAbGroup]) -> Self {
        let mut inv = Vec::new();
        for p in parts {
            inv.extend(p.invariants.iter().cloned());
        }
        Self::from_cyclic_orders(&inv)
    }

    pub fn invariants(&self) -> &[BigInt] {
        &self.invariants
    }

    /// Number of canonical generators.
    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    pub fn free_rank(&self) -> usize {
        self.invariants.iter().filter(|d| d.is_zero()).count()
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    pub fn to_canon(&self) -> &IntMatrix {
        &self.to_canon
    }

    pub fn from_canon(&self) -> &IntMatrix {
        &self.from_canon
    }

    /// Order, or `None` when the group is infinite.
    pub fn order(&self) -> Option<BigInt> {
        let mut o = BigInt::one();
        for d in &self.invariants {
            if d.is_zero() {
                return None;
            }
            o *= d;
        }
        Some(o)
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty()
    }

    pub fn zero(&self) -> Vec<BigInt> {
        vec![BigInt::zero(); self.rank()]
    }

    pub fn reduce(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.rank());
        v.iter()
            .zip(&self.invariants)
            .map(|(x, d)| {
                if d.is_zero() {
                    x.clone()
                } else {
                    x.mod_floor(d)
                }
            })
            .collect()
    }

    pub fn is_zero_element(&self, v: &[BigInt]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Canonical coordinates of a vector in presentation coordinates.
    pub fn canon_of(&self, presentation: &[BigInt]) -> Vec<BigInt> {
        self.reduce(&self.to_canon.apply(presentation))
    }

    /// Presentation vector of an element given canonically.
    pub fn presentation_of(&self, canon: &[BigInt]) -> Vec<BigInt> {
        self.from_canon.apply(canon)
    }

    pub fn add(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let s: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&s)
    }

    pub fn scale(&self, a: &[BigInt], k: &BigInt) -> Vec<BigInt> {
        let s: Vec<BigInt> = a.iter().map(|x| x * k).collect();
        self.reduce(&s)
    }

    /// Order of an element (`None` if infinite).
    pub fn element_order(&self, v: &[BigInt]) -> Option<BigInt> {
        let v = self.reduce(v);
        let mut o = BigInt::one();
        for (x, d) in v.iter().zip(&self.invariants) {
            if x.is_zero() {
                continue;
            }
            if d.is_zero() {
                return None;
            }
            o = o.lcm(&(d / x.gcd(d)));
        }
        Some(o)
    }

    fn mods(&self) -> &[BigInt] {
        &self.invariants
    }

    /// Subgroup generated by `elements` (canonical coordinates).
    pub fn span(&self, elements: &[Vec<BigInt>]) -> Subgroup {
        Subgroup::new(self.clone(), elements.to_vec())
    }

    pub fn whole(&self) -> Subgroup {
        let gens: Vec<Vec<BigInt>> = (0..self.rank())
            .map(|i| unit_vector(self.rank(), i))
            .collect();
        self.span(&gens)
    }

    /// Subgroup of elements fixed by every listed automorphism (matrices act
    /// on canonical coordinates, rows = images of generators).
    pub fn fixed_points(&self, action: &[IntMatrix]) -> Result<Subgroup> {
        let k = self.rank();
        let mut blocks = IntMatrix::zeros(k, 0);
        let mut mods = Vec::new();
        for (n, a) in action.iter().enumerate() {
            let hom = GroupHom::new(self.clone(), self.clone(), a.clone())
                .map_err(|_| Error::NotAutomorphism(format!("action matrix {}", n)))?;
            if !hom.is_injective() || !hom.is_surjective() {
                return Err(Error::NotAutomorphism(format!("action matrix {}", n)));
            }
            blocks = blocks.hstack(&a.sub(&IntMatrix::identity(k)));
            mods.extend(self.mods().iter().cloned());
        }
        if action.is_empty() {
            return Ok(self.whole());
        }
        let kern = lattice_kernel(&blocks, &mods);
        Ok(self.span(&kern.to_rows()))
    }

    /// Quotient by a subgroup, with the projection.
    pub fn quotient(&self, sub: &Subgroup) -> Quotient {
        assert!(sub.ambient == *self, "subgroup of a different group");
        let k = self.rank();
        let mut rels = IntMatrix::diagonal(&self.invariants);
        let gens = IntMatrix::from_rows(sub.gens.clone(), k);
        rels = rels.vstack(&gens);
        let group = FgAbGroup::from_presentation(k, &rels);
        let proj_rows: Vec<Vec<BigInt>> =
            (0..k).map(|i| group.canon_of(&unit_vector(k, i))).collect();
        let projection = GroupHom {
            source: self.clone(),
            target: group.clone(),
            matrix: IntMatrix::from_rows(proj_rows, group.rank()),
        };
        Quotient { group, projection }
    }
}

pub fn unit_vector(n: usize, i: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); n];
    v[i] = BigInt::one();
    v
}

/// Homomorphism between canonical groups; row `i` of `matrix` is the image
/// of the `i`-th canonical generator of the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupHom {
    source: FgAbGroup,
    target: FgAbGroup,
    matrix: IntMatrix,
}

impl GroupHom {
    pub fn new(source: FgAbGroup, target: FgAbGroup, matrix: IntMatrix) -> Result<Self> {
        assert_eq!(matrix.rows, source.rank());
        assert_eq!(matrix.cols, target.rank());
        let mut reduced = Vec::with_capacity(matrix.rows);
        for i in 0..matrix.rows {
            let row = target.reduce(matrix.row(i));
            let d = &source.invariants[i];
            if !d.is_zero() && !target.is_zero_element(&target.scale(&row, d)) {
                return Err(Error::Internal(format!(
                    "homomorphism does not respect relation {} of the source",
                    i
                )));
            }
            reduced.push(row);
        }
        let matrix = IntMatrix::from_rows(reduced, target.rank());
        Ok(GroupHom {
            source,
            target,
            matrix,
        })
    }

    /// Builds a homomorphism from the images of the *presentation*
    /// generators of the source, given in the *presentation* coordinates of
    /// the target.
    pub fn from_presentation_images(
        source: FgAbGroup,
        target: FgAbGroup,
        images: &IntMatrix,
    ) -> Result<Self> {
        assert_eq!(images.rows, source.ngens);
        assert_eq!(images.cols, target.ngens);
        let m = source.from_canon.mul(images).mul(&target.to_canon);
        Self::new(source, target, m)
    }

    pub fn identity(g: &FgAbGroup) -> Self {
        GroupHom {
            source: g.clone(),
            target: g.clone(),
            matrix: IntMatrix::identity(g.rank()),
        }
    }

    pub fn zero(source: &FgAbGroup, target: &FgAbGroup) -> Self {
        GroupHom {
            source: source.clone(),
            target: target.clone(),
            matrix: IntMatrix::zeros(source.rank(), target.rank()),
        }
    }

    pub fn source(&self) -> &FgAbGroup {
        &self.source
    }

    pub fn target(&self) -> &FgAbGroup {
        &self.target
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        self.target.reduce(&self.matrix.apply(x))
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GroupHom) -> GroupHom {
        assert!(self.target == other.source);
        let m = self.matrix.mul(&other.matrix);
        GroupHom::new(self.source.clone(), other.target.clone(), m)
            .expect("composition of homomorphisms")
    }

    pub fn kernel(&self) -> Subgroup {
        let kern = lattice_kernel(&self.matrix, self.target.mods());
        self.source.span(&kern.to_rows())
    }

    pub fn image(&self) -> Subgroup {
        self.target.span(&self.matrix.to_rows())
    }

    pub fn cokernel(&self) -> Quotient {
        self.target.quotient(&self.image())
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().group.is_trivial()
    }

    pub fn is_surjective(&self) -> bool {
        self.cokernel().group.is_trivial()
    }
}

/// A subgroup given by generators, with its abstract structure and the
/// embedding into the ambient group.
#[derive(Clone, Debug)]
pub struct Subgroup {
    ambient: FgAbGroup,
    gens: Vec<Vec<BigInt>>,
    group: FgAbGroup,
    embedding: GroupHom,
    lattice: IntMatrix,
    lattice_transform: IntMatrix,
}

impl Subgroup {
    fn new(ambient: FgAbGroup, gens: Vec<Vec<BigInt>>) -> Self {
        let k = ambient.rank();
        let gens: Vec<Vec<BigInt>> = gens.iter().map(|g| ambient.reduce(g)).collect();
        let m = gens.len();
        let gm = IntMatrix::from_rows(gens.clone(), k);
        let rels = lattice_kernel(&gm, ambient.mods());
        let group = FgAbGroup::from_presentation(m, &rels);
        let emb = group.from_canon.mul(&gm);
        let embedding =
            GroupHom::new(group.clone(), ambient.clone(), emb).expect("subgroup embedding");
        let stacked = gm.vstack(&IntMatrix::diagonal(&ambient.invariants));
        let (h, u) = hnf(&stacked);
        Subgroup {
            ambient,
            gens,
            group,
            embedding,
            lattice: h,
            lattice_transform: u,
        }
    }

    pub fn ambient(&self) -> &FgAbGroup {
        &self.ambient
    }

    pub fn generators(&self) -> &[Vec<BigInt>] {
        &self.gens
    }

    /// The subgroup as an abstract group.
    pub fn group(&self) -> &FgAbGroup {
        &self.group
    }

    pub fn embedding(&self) -> &GroupHom {
        &self.embedding
    }

    pub fn order(&self) -> Option<BigInt> {
        self.group.order()
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.coordinates(x).is_some()
    }

    /// Canonical coordinates in `self.group()` of an ambient element that
    /// lies in the subgroup.
    pub fn coordinates(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        let x = self.ambient.reduce(x);
        let (rem, t) = hnf_reduce(&x, &self.lattice);
        if rem.iter().any(|v| !v.is_zero()) {
            return None;
        }
        let coeffs = self.lattice_transform.apply(&t);
        let c = &coeffs[..self.gens.len()];
        Some(self.group.canon_of(c))
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.ambient == other.ambient && self.gens.iter().all(|g| other.contains(g))
    }

    pub fn same_as(&self, other: &Subgroup) -> bool {
        self.is_subgroup_of(other) && other.is_subgroup_of(self)
    }

    /// `self / sub` for a subgroup `sub ⊆ self` of the same ambient group.
    pub fn quotient_by(&self, sub: &Subgroup) -> Result<FgAbGroup> {
        if !sub.is_subgroup_of(self) {
            return Err(Error::Internal(
                "quotient by a non-contained subgroup".into(),
            ));
        }
        let q = self.ambient.quotient(sub);
        let imgs: Vec<Vec<BigInt>> = self.gens.iter().map(|g| q.projection.apply(g)).collect();
        let m = IntMatrix::from_rows(imgs, q.group.rank());
        let rels = lattice_kernel(&m, q.group.mods());
        Ok(FgAbGroup::from_presentation(self.gens.len(), &rels))
    }

    /// Corestriction of `f` to this subgroup, when `f` lands inside it.
    pub fn corestrict(&self, f: &GroupHom) -> Result<GroupHom> {
        if f.target != self.ambient {
            return Err(Error::Internal("corestriction target mismatch".into()));
        }
        let mut rows = Vec::new();
        for i in 0..f.source.rank() {
            let img = f.matrix.row(i);
            let c = self
                .coordinates(img)
                .ok_or_else(|| Error::Internal("image not contained in subgroup".into()))?;
            rows.push(c);
        }
        GroupHom::new(
            f.source.clone(),
            self.group.clone(),
            IntMatrix::from_rows(rows, self.group.rank()),
        )
    }
}

#[derive(Clone, Debug)]
pub struct Quotient {
    pub group: FgAbGroup,
    pub projection: GroupHom,
}

impl Quotient {
    /// A preimage (in the source group) of a canonical quotient generator.
    pub fn lift_generator(&self, i: usize) -> Vec<BigInt> {
        self.projection.source.reduce(self.group.from_canon.row(i))
    }
}

pub fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn bigs(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    #[test]
    fn hnf_examples() {
        let a = m(&[&[2, 4], &[1, 3]]);
        let (h, u) = hnf(&a);
        // same lattice as [[1,3],[0,2]], with the entry above the pivot reduced
        assert_eq!(h, m(&[&[1, 1], &[0, 2]]));
        assert_eq!(hnf(&m(&[&[1, 3], &[0, 2]])).0, h);
        assert_eq!(u.mul(&a), h);
        assert!(u.determinant().abs().is_one());

        let id = IntMatrix::identity(3);
        let (h, u) = hnf(&id);
        assert_eq!(h, id);
        assert_eq!(u, id);

        let z = IntMatrix::zeros(2, 3);
        assert_eq!(hnf(&z).0, z);
    }

    #[test]
    fn snf_examples() {
        let (d, l, r) = snf(&m(&[&[2, 0], &[0, 3]]));
        assert_eq!(d, m(&[&[1, 0], &[0, 6]]));
        assert_eq!(l.mul(&m(&[&[2, 0], &[0, 3]])).mul(&r), d);

        let a = m(&[&[4, 6], &[6, 4]]);
        let (d, l, r) = snf(&a);
        assert_eq!(d, m(&[&[2, 0], &[0, 10]]));
        assert_eq!(l.mul(&a).mul(&r), d);

        let z = IntMatrix::zeros(2, 2);
        assert_eq!(snf(&z).0, z);
    }

    #[test]
    fn presentations() {
        let g = FgAbGroup::from_presentation(2, &m(&[&[2, 0]]));
        assert_eq!(g.invariants(), &bigs(&[2, 0])[..]);
        assert_eq!(g.to_string(), "Z/2 + Z");
        let g = FgAbGroup::from_presentation(2, &m(&[&[2, 0], &[0, 3]]));
        assert_eq!(g.invariants(), &bigs(&[6])[..]);
        let g = FgAbGroup::from_presentation(3, &IntMatrix::zeros(0, 3));
        assert_eq!(g.invariants(), &bigs(&[0, 0, 0])[..]);
        assert_eq!(g.order(), None);
    }

    fn cyclic(n: i64) -> FgAbGroup {
        FgAbGroup::from_invariants(&bigs(&[n]))
    }

    #[test]
    fn kernels() {
        let z4 = cyclic(4);
        let times2 = GroupHom::new(z4.clone(), z4.clone(), m(&[&[2]])).unwrap();
        let k = times2.kernel();
        assert_eq!(k.order(), Some(big(2)));
        assert!(k.contains(&bigs(&[2])));
        assert!(!k.contains(&bigs(&[1])));

        let z6 = cyclic(6);
        let zero = GroupHom::zero(&z6, &z6);
        assert_eq!(zero.kernel().order(), Some(big(6)));

        let z = FgAbGroup::free(1);
        let z5 = cyclic(5);
        let proj = GroupHom::new(z.clone(), z5, m(&[&[1]])).unwrap();
        let k = proj.kernel();
        assert_eq!(k.group().invariants(), &bigs(&[0])[..]);
        assert!(k.contains(&bigs(&[5])));
        assert!(!k.contains(&bigs(&[1])));
    }

    #[test]
    fn cokernels() {
        let z4 = cyclic(4);
        let times2 = GroupHom::new(z4.clone(), z4.clone(), m(&[&[2]])).unwrap();
        assert_eq!(times2.cokernel().group.invariants(), &bigs(&[2])[..]);

        let z6 = cyclic(6);
        assert!(GroupHom::identity(&z6).cokernel().group.is_trivial());

        let z = FgAbGroup::free(1);
        let incl = GroupHom::new(z.clone(), z.clone(), m(&[&[2]])).unwrap();
        assert_eq!(incl.cokernel().group.invariants(), &bigs(&[2])[..]);
    }

    #[test]
    fn bad_hom_rejected() {
        // Z/2 -> Z/3 sending the generator to 1 does not respect 2x = 0
        assert!(GroupHom::new(cyclic(2), cyclic(3), m(&[&[1]])).is_err());
    }

    #[test]
    fn spans() {
        let z4 = cyclic(4);
        assert_eq!(z4.span(&[bigs(&[2])]).order(), Some(big(2)));
        assert!(z4.span(&[]).group().is_trivial());
        let g = FgAbGroup::from_invariants(&bigs(&[2, 4]));
        assert_eq!(
            g.span(&[bigs(&[1, 0]), bigs(&[0, 2])]).order(),
            Some(big(4))
        );
    }

    #[test]
    fn fixed_point_examples() {
        let z2 = FgAbGroup::free(2);
        let swap = m(&[&[0, 1], &[1, 0]]);
        let fix = z2.fixed_points(&[swap]).unwrap();
        assert_eq!(fix.group().invariants(), &bigs(&[0])[..]);
        assert!(fix.contains(&bigs(&[3, 3])));
        assert!(!fix.contains(&bigs(&[1, 0])));

        assert!(z2
            .fixed_points(&[IntMatrix::identity(2)])
            .unwrap()
            .same_as(&z2.whole()));

        let z3 = cyclic(3);
        assert!(z3
            .fixed_points(&[m(&[&[-1]])])
            .unwrap()
            .group()
            .is_trivial());

        // not invertible
        assert!(z2.fixed_points(&[m(&[&[2, 0], &[0, 1]])]).is_err());
    }

    #[test]
    fn subgroup_quotients_and_corestriction() {
        let g = FgAbGroup::from_invariants(&bigs(&[2, 4]));
        let big_sub = g.span(&[bigs(&[1, 0]), bigs(&[0, 1])]);
        let small = g.span(&[bigs(&[0, 2])]);
        let q = big_sub.quotient_by(&small).unwrap();
        assert_eq!(q.order(), Some(big(4)));
        assert_eq!(q.invariants(), &bigs(&[2, 2])[..]);

        let z2 = cyclic(2);
        let f = GroupHom::new(z2, g.clone(), m(&[&[0, 2]])).unwrap();
        let co = big_sub.corestrict(&f).unwrap();
        assert_eq!(co.cokernel().group.order(), Some(big(4)));
    }

    fn small_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..4, 1usize..4).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-12i64..12, r * c).prop_map(move |v| {
                IntMatrix::from_rows(v.chunks(c).map(bigs).collect(), c)
            })
        })
    }

    proptest! {
        #[test]
        fn snf_reconstructs(a in small_matrix()) {
            let (d, l, r) = snf(&a);
            prop_assert_eq!(l.mul(&a).mul(&r), d.clone());
            prop_assert!(l.determinant().abs().is_one());
            prop_assert!(r.determinant().abs().is_one());
            let n = d.rows().min(d.cols());
            for i in 0..n {
                prop_assert!(!d[(i, i)].is_negative());
                if i + 1 < n && !d[(i, i)].is_zero() {
                    prop_assert!(d[(i + 1, i + 1)].is_multiple_of(&d[(i, i)]));
                }
                if d[(i, i)].is_zero() && i + 1 < n {
                    prop_assert!(d[(i + 1, i + 1)].is_zero());
                }
            }
        }

        #[test]
        fn hnf_reconstructs(a in small_matrix()) {
            let (h, u) = hnf(&a);
            prop_assert_eq!(u.mul(&a), h);
            prop_assert!(u.determinant().abs().is_one());
        }

        #[test]
        fn presentation_invariant_under_row_ops(a in small_matrix(), k in -3i64..3) {
            let g1 = FgAbGroup::from_presentation(a.cols(), &a);
            let mut b = a.clone();
            if b.rows() > 1 {
                b.row_submul(0, 1, &big(k));
                b.swap_rows(0, 1);
            }
            b.negate_row(0);
            let g2 = FgAbGroup::from_presentation(b.cols(), &b);
            prop_assert_eq!(g1.invariants(), g2.invariants());
        }

        #[test]
        fn kernel_image_orders(
            a in proptest::collection::vec(1i64..7, 1..3),
            b in proptest::collection::vec(1i64..7, 1..3),
            entries in proptest::collection::vec(-5i64..5, 9),
        ) {
            let src = FgAbGroup::from_cyclic_orders(&bigs(&a));
            let tgt = FgAbGroup::from_cyclic_orders(&bigs(&b));
            // generic matrix made compatible by multiplying by the target exponent
            let exp = tgt.invariants().iter().fold(BigInt::one(), |acc, d| acc.lcm(d));
            let mut rows = Vec::new();
            for i in 0..src.rank() {
                let row: Vec<BigInt> = (0..tgt.rank())
                    .map(|j| {
                        let d = &src.invariants()[i];
                        let base = big(entries[(i * 3 + j) % 9]);
                        // make d * row ≡ 0 in the target
                        base * (&exp / exp.gcd(d))
                    })
                    .collect();
                rows.push(row);
            }
            let f = GroupHom::new(src.clone(), tgt.clone(), IntMatrix::from_rows(rows, tgt.rank())).unwrap();
            let ko = f.kernel().order().unwrap();
            let io = f.image().order().unwrap();
            prop_assert_eq!(ko * io, src.order().unwrap());
        }

        #[test]
        fn fixed_points_idempotent(a in proptest::collection::vec(1i64..9, 1..3)) {
            let g = FgAbGroup::from_cyclic_orders(&bigs(&a));
            let neg = IntMatrix::diagonal(&vec![big(-1); g.rank()]);
            let fix = g.fixed_points(std::slice::from_ref(&neg)).unwrap();
            // the fixed points of the fixed subgroup are itself
            let again = fix.group().fixed_points(&[IntMatrix::diagonal(&vec![big(-1); fix.group().rank()])]).unwrap();
            prop_assert_eq!(again.order(), fix.order());
            prop_assert!(g.fixed_points(&[]).unwrap().same_as(&g.whole()));
        }
    }
}
