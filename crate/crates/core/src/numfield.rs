//! Quadratic and biquadratic number fields with exact element arithmetic.
//!
//! Every field has a *power basis* of square-root monomials: for a
//! biquadratic field `Q(√m1, √m2)` the monomials are `1, √m1, √m2, √m1·√m2`
//! (indexed by bit masks), for `Q(√d)` they are `1, √d`, and `Q` itself has
//! the single monomial `1`. Elements are stored on the integral basis with
//! a common denominator.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::abelian::{hnf_basis, IntMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldKind {
    Rational,
    Quadratic(i64),
    Biquadratic(i64, i64),
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Rational => write!(f, "Q"),
            FieldKind::Quadratic(d) => write!(f, "Q(sqrt {})", d),
            FieldKind::Biquadratic(a, b) => write!(f, "Q(sqrt {}, sqrt {})", a, b),
        }
    }
}

pub fn is_squarefree(n: i64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n.unsigned_abs();
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Squarefree kernel of a nonzero integer, keeping the sign.
pub fn squarefree_part(n: &BigInt) -> BigInt {
    let mut m = n.abs();
    let mut out = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= m {
        let mut e = 0;
        while m.is_multiple_of(&p) {
            m /= &p;
            e += 1;
        }
        if e % 2 == 1 {
            out *= &p;
        }
        p += 1;
    }
    out *= m;
    if n.is_negative() {
        -out
    } else {
        out
    }
}

fn quadratic_disc(d: i64) -> i64 {
    if d.rem_euclid(4) == 1 {
        d
    } else {
        4 * d
    }
}

/// A field automorphism, recorded by which square roots it negates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automorphism {
    signs: usize,
    matrix: IntMatrix,
}

impl Automorphism {
    /// Bit `i` set means `√m_i ↦ -√m_i`.
    pub fn signs(&self) -> usize {
        self.signs
    }

    /// Action on integral-basis coordinates (row vector times matrix).
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn is_identity(&self) -> bool {
        self.signs == 0
    }
}

struct FieldData {
    kind: FieldKind,
    degree: usize,
    radicands: Vec<i64>,
    /// `rads[k]` is the product of the radicands whose bits are set in `k`.
    rads: Vec<BigInt>,
    basis: IntMatrix,
    basis_den: BigInt,
    inv: IntMatrix,
    inv_den: BigInt,
    table: Vec<Vec<Vec<BigInt>>>,
    disc: BigInt,
    signature: (usize, usize),
    auts: Vec<Automorphism>,
    gram: IntMatrix,
    conj_mask: usize,
}

/// Shared handle to a field; equality is by kind and parameters.
#[derive(Clone)]
pub struct NumberField(Arc<FieldData>);

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.0.kind == other.0.kind
    }
}

impl Eq for NumberField {}

impl Hash for NumberField {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.kind.hash(state)
    }
}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.kind)
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.kind)
    }
}

fn registry() -> &'static Mutex<HashMap<FieldKind, NumberField>> {
    static REG: OnceLock<Mutex<HashMap<FieldKind, NumberField>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

type PVec = Vec<BigRational>;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pmul(rads: &[BigInt], x: &[BigRational], y: &[BigRational]) -> PVec {
    let n = rads.len();
    let mut out = vec![BigRational::zero(); n];
    for k in 0..n {
        if x[k].is_zero() {
            continue;
        }
        for l in 0..n {
            if y[l].is_zero() {
                continue;
            }
            out[k ^ l] += &x[k] * &y[l] * BigRational::from_integer(rads[k & l].clone());
        }
    }
    out
}

fn pconj(x: &[BigRational], s: usize) -> PVec {
    x.iter()
        .enumerate()
        .map(|(k, c)| {
            if (k & s).count_ones() % 2 == 1 {
                -c.clone()
            } else {
                c.clone()
            }
        })
        .collect()
}

/// Integrality via the characteristic polynomial over the power basis.
fn p_is_integral(rads: &[BigInt], x: &[BigRational]) -> bool {
    let n = rads.len();
    let mut poly: Vec<PVec> = vec![unit_pvec(n)];
    for s in 0..n {
        let c = pconj(x, s);
        let mut next = vec![vec![BigRational::zero(); n]; poly.len() + 1];
        for (i, a) in poly.iter().enumerate() {
            for k in 0..n {
                next[i + 1][k] += &a[k];
            }
            let p = pmul(rads, a, &c);
            for k in 0..n {
                next[i][k] -= &p[k];
            }
        }
        poly = next;
    }
    poly.iter()
        .all(|c| c[0].is_integer() && c[1..].iter().all(Zero::is_zero))
}

fn unit_pvec(n: usize) -> PVec {
    let mut v = vec![BigRational::zero(); n];
    v[0] = BigRational::one();
    v
}

fn common_den(rows: &[PVec]) -> BigInt {
    rows.iter()
        .flatten()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

fn scaled(rows: &[PVec], den: &BigInt) -> IntMatrix {
    let n = rows.first().map_or(0, |r| r.len());
    IntMatrix::from_rows(
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|q| (q * BigRational::from_integer(den.clone())).to_integer())
                    .collect()
            })
            .collect(),
        n,
    )
}

fn rat_inverse(m: &[PVec]) -> Option<Vec<PVec>> {
    let n = m.len();
    let mut a: Vec<PVec> = m.to_vec();
    let mut inv: Vec<PVec> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c].clone();
        for j in 0..n {
            a[c][j] = &a[c][j] / &piv;
            inv[c][j] = &inv[c][j] / &piv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..n {
                    let t = &f * &a[c][j];
                    a[r][j] -= t;
                    let t = &f * &inv[c][j];
                    inv[r][j] -= t;
                }
            }
        }
    }
    Some(inv)
}

fn rows_of(m: &IntMatrix, den: &BigInt) -> Vec<PVec> {
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|x| BigRational::new(x.clone(), den.clone()))
                .collect()
        })
        .collect()
}

fn trace_disc(rads: &[BigInt], basis: &[PVec]) -> BigRational {
    let n = rads.len();
    let nn = rat(n as i64);
    let tr: Vec<Vec<BigInt>> = basis
        .iter()
        .map(|a| {
            basis
                .iter()
                .map(|b| {
                    let p = pmul(rads, a, b);
                    let t = &p[0] * &nn;
                    t.to_integer()
                })
                .collect()
        })
        .collect();
    BigRational::from_integer(IntMatrix::from_rows(tr, n).determinant())
}

fn small_primes_dividing(n: &BigInt) -> Vec<BigInt> {
    let mut m = n.abs();
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    while &p * &p <= m {
        if m.is_multiple_of(&p) {
            out.push(p.clone());
            while m.is_multiple_of(&p) {
                m /= &p;
            }
        }
        p += 1;
    }
    if m > BigInt::one() {
        out.push(m);
    }
    out
}

/// Maximal order of a biquadratic field: starts from the compositum of the
/// quadratic subfield orders and saturates at every prime dividing the
/// index, then checks the discriminant.
fn biquadratic_basis(
    rads: &[BigInt],
    subs: &[(i64, usize, BigInt)],
    expected: &BigInt,
) -> Result<Vec<PVec>> {
    let n = 4;
    let quad_gen = |r: i64, mask: usize, g: &BigInt| -> PVec {
        let mut v = vec![BigRational::zero(); n];
        let root = BigRational::new(BigInt::one(), g.clone());
        if r.rem_euclid(4) == 1 {
            v[0] = BigRational::new(BigInt::one(), BigInt::from(2));
            v[mask] = root / rat(2);
        } else {
            v[mask] = root;
        }
        v
    };
    let g1 = quad_gen(subs[0].0, subs[0].1, &subs[0].2);
    let g2 = quad_gen(subs[1].0, subs[1].1, &subs[1].2);
    let g3 = quad_gen(subs[2].0, subs[2].1, &subs[2].2);
    let one = unit_pvec(n);
    let mut gens = vec![
        one.clone(),
        g1.clone(),
        g2.clone(),
        pmul(rads, &g1, &g2),
        g3,
    ];
    let lattice = |gens: &[PVec]| -> Vec<PVec> {
        let den = common_den(gens);
        let h = hnf_basis(&scaled(gens, &den));
        rows_of(&h, &den)
    };
    let mut basis = lattice(&gens);
    loop {
        let disc = trace_disc(rads, &basis);
        let ratio = &disc / BigRational::from_integer(expected.clone());
        if !ratio.is_integer() {
            return Err(Error::BasisVerification(format!("{:?}", rads)));
        }
        let ratio = ratio.to_integer();
        if ratio.is_one() {
            break;
        }
        let mut grown = false;
        'primes: for p in small_primes_dividing(&ratio) {
            let pi = p.to_i64().unwrap_or(i64::MAX);
            if pi > 97 {
                return Err(Error::BasisVerification(format!(
                    "index prime {} too large",
                    p
                )));
            }
            let total = (pi as u64).pow(n as u32);
            for code in 1..total {
                let mut c = code;
                let mut y = vec![BigRational::zero(); n];
                for b in &basis {
                    let coef = rat((c % pi as u64) as i64);
                    c /= pi as u64;
                    for k in 0..n {
                        y[k] += &coef * &b[k];
                    }
                }
                let y: PVec = y
                    .into_iter()
                    .map(|v| v / BigRational::from_integer(p.clone()))
                    .collect();
                if p_is_integral(rads, &y) {
                    gens = basis.clone();
                    gens.push(y);
                    basis = lattice(&gens);
                    grown = true;
                    break 'primes;
                }
            }
        }
        if !grown {
            return Err(Error::BasisVerification(format!(
                "saturation stalled for {:?}",
                rads
            )));
        }
    }
    Ok(basis)
}

/// Rearranges a lattice basis to lower-triangular form (so the first
/// basis vector is 1 for an order).
fn lower_triangular(basis: &[PVec]) -> Vec<PVec> {
    let n = basis.len();
    let rev: Vec<PVec> = basis
        .iter()
        .map(|r| r.iter().rev().cloned().collect())
        .collect();
    let den = common_den(&rev);
    let h = hnf_basis(&scaled(&rev, &den));
    let rows = rows_of(&h, &den);
    let mut out: Vec<PVec> = rows
        .into_iter()
        .map(|r| r.into_iter().rev().collect())
        .collect();
    out.reverse();
    assert_eq!(out.len(), n);
    out
}

impl NumberField {
    pub fn rational() -> NumberField {
        Self::intern(FieldKind::Rational).expect("Q is always constructible")
    }

    pub fn quadratic(d: i64) -> Result<NumberField> {
        if d == 0 || d == 1 {
            return Err(Error::InvalidField(format!("d = {}", d)));
        }
        if !is_squarefree(d) {
            return Err(Error::NotSquarefree(d));
        }
        Self::intern(FieldKind::Quadratic(d))
    }

    pub fn biquadratic(m1: i64, m2: i64) -> Result<NumberField> {
        for m in [m1, m2] {
            if m == 0 || m == 1 {
                return Err(Error::InvalidField(format!("radicand {}", m)));
            }
            if !is_squarefree(m) {
                return Err(Error::NotSquarefree(m));
            }
        }
        if m1 == m2 {
            return Err(Error::InvalidField(format!("equal radicands {}", m1)));
        }
        let g = m1.gcd(&m2);
        if (m1 / g) * (m2 / g) == 1 {
            return Err(Error::InvalidField(format!("{}·{} is a square", m1, m2)));
        }
        Self::intern(FieldKind::Biquadratic(m1, m2))
    }

    pub fn from_kind(kind: FieldKind) -> Result<NumberField> {
        match kind {
            FieldKind::Rational => Ok(Self::rational()),
            FieldKind::Quadratic(d) => Self::quadratic(d),
            FieldKind::Biquadratic(a, b) => Self::biquadratic(a, b),
        }
    }

    fn intern(kind: FieldKind) -> Result<NumberField> {
        if let Some(f) = registry().lock().expect("field registry").get(&kind) {
            return Ok(f.clone());
        }
        let f = NumberField(Arc::new(Self::build(kind)?));
        let mut reg = registry().lock().expect("field registry");
        Ok(reg.entry(kind).or_insert(f).clone())
    }

    fn build(kind: FieldKind) -> Result<FieldData> {
        let radicands: Vec<i64> = match kind {
            FieldKind::Rational => vec![],
            FieldKind::Quadratic(d) => vec![d],
            FieldKind::Biquadratic(a, b) => vec![a, b],
        };
        let n = 1usize << radicands.len();
        let rads: Vec<BigInt> = (0..n)
            .map(|k| {
                radicands
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| k >> i & 1 == 1)
                    .fold(BigInt::one(), |acc, (_, &m)| acc * m)
            })
            .collect();
        let (basis, expected): (Vec<PVec>, BigInt) = match kind {
            FieldKind::Rational => (vec![unit_pvec(1)], BigInt::one()),
            FieldKind::Quadratic(d) => {
                let b = if d.rem_euclid(4) == 1 {
                    vec![
                        vec![rat(1), rat(0)],
                        vec![
                            BigRational::new(1.into(), 2.into()),
                            BigRational::new(1.into(), 2.into()),
                        ],
                    ]
                } else {
                    vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)]]
                };
                (b, BigInt::from(quadratic_disc(d)))
            }
            FieldKind::Biquadratic(m1, m2) => {
                let g = m1.gcd(&m2).abs();
                let m3 = (m1 / g) * (m2 / g);
                let subs = vec![
                    (m1, 1usize, BigInt::one()),
                    (m2, 2, BigInt::one()),
                    (m3, 3, BigInt::from(g)),
                ];
                let expected = BigInt::from(quadratic_disc(m1))
                    * BigInt::from(quadratic_disc(m2))
                    * BigInt::from(quadratic_disc(m3));
                (
                    lower_triangular(&biquadratic_basis(&rads, &subs, &expected)?),
                    expected,
                )
            }
        };
        let disc = trace_disc(&rads, &basis);
        if disc != BigRational::from_integer(expected.clone()) {
            return Err(Error::BasisVerification(format!(
                "{} has discriminant {}",
                kind, disc
            )));
        }
        if !basis[0][0].is_one() || basis[0][1..].iter().any(|x| !x.is_zero()) {
            return Err(Error::BasisVerification(format!(
                "{}: first basis element is not 1",
                kind
            )));
        }
        let basis_den = common_den(&basis);
        let basis_int = scaled(&basis, &basis_den);
        let inv_rows =
            rat_inverse(&basis).ok_or_else(|| Error::BasisVerification(kind.to_string()))?;
        let inv_den = common_den(&inv_rows);
        let inv = scaled(&inv_rows, &inv_den);

        let to_integral = |x: &PVec| -> Result<Vec<BigInt>> {
            let mut out = Vec::with_capacity(n);
            for j in 0..n {
                let mut s = BigRational::zero();
                for k in 0..n {
                    s += &x[k] * &inv_rows[k][j];
                }
                if !s.is_integer() {
                    return Err(Error::BasisVerification(format!(
                        "{} not closed under multiplication",
                        kind
                    )));
                }
                out.push(s.to_integer());
            }
            Ok(out)
        };
        let mut table = vec![vec![Vec::new(); n]; n];
        for i in 0..n {
            for j in 0..n {
                table[i][j] = to_integral(&pmul(&rads, &basis[i], &basis[j]))?;
            }
        }
        let mut auts = Vec::with_capacity(n);
        for s in 0..n {
            let rows: Result<Vec<Vec<BigInt>>> =
                basis.iter().map(|b| to_integral(&pconj(b, s))).collect();
            auts.push(Automorphism {
                signs: s,
                matrix: IntMatrix::from_rows(rows?, n),
            });
        }
        let totally_real = radicands.iter().all(|&m| m > 0);
        let signature = if totally_real { (n, 0) } else { (0, n / 2) };
        let conj_mask = radicands
            .iter()
            .enumerate()
            .filter(|(_, &m)| m < 0)
            .fold(0, |acc, (i, _)| acc | 1 << i);

        let mut gram = IntMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for k in 0..n {
                    s += &basis[i][k] * &basis[j][k] * BigRational::from_integer(rads[k].abs() * n);
                }
                if !s.is_integer() {
                    return Err(Error::BasisVerification(format!(
                        "{}: non-integral T2 form",
                        kind
                    )));
                }
                gram[(i, j)] = s.to_integer();
            }
        }
        Ok(FieldData {
            kind,
            degree: n,
            radicands,
            rads,
            basis: basis_int,
            basis_den,
            inv,
            inv_den,
            table,
            disc: expected,
            signature,
            auts,
            gram,
            conj_mask,
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.0.kind
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.0.disc
    }

    /// `(r1, r2)`.
    pub fn signature(&self) -> (usize, usize) {
        self.0.signature
    }

    pub fn is_totally_real(&self) -> bool {
        self.0.signature.1 == 0
    }

    pub fn radicands(&self) -> &[i64] {
        &self.0.radicands
    }

    /// Integral basis rows in power-basis coordinates, scaled by
    /// [`Self::basis_denominator`].
    pub fn integral_basis(&self) -> &IntMatrix {
        &self.0.basis
    }

    pub fn basis_denominator(&self) -> &BigInt {
        &self.0.basis_den
    }

    /// Integer T2 Gram matrix on the integral basis.
    pub fn t2_gram(&self) -> &IntMatrix {
        &self.0.gram
    }

    /// Mask of the automorphism acting as complex conjugation (0 when real).
    pub fn conjugation_mask(&self) -> usize {
        self.0.conj_mask
    }

    pub fn automorphisms(&self) -> &[Automorphism] {
        &self.0.auts
    }

    pub fn automorphism(&self, signs: usize) -> &Automorphism {
        &self.0.auts[signs]
    }

    /// The three quadratic subfields of a biquadratic field, in the order
    /// `√m1, √m2, √(m1·m2)`.
    pub fn quadratic_subfields(&self) -> Vec<NumberField> {
        match self.0.kind {
            FieldKind::Biquadratic(..) => (1..4)
                .map(|k| {
                    let d = squarefree_part(&self.0.rads[k])
                        .to_i64()
                        .expect("small radicand");
                    NumberField::quadratic(d).expect("subfield radicand is squarefree")
                })
                .collect(),
            _ => vec![],
        }
    }

    /// Power-basis monomial mask and scale `g` with `√d = mono / g`, when
    /// `Q(√d)` is a subfield.
    fn subfield_mask(&self, d: i64) -> Option<(usize, BigInt)> {
        let dd = BigInt::from(d);
        (1..self.0.degree).find_map(|k| {
            let r = &self.0.rads[k];
            if squarefree_part(r) == dd {
                let g2 = r / &dd;
                Some((k, g2.sqrt()))
            } else {
                None
            }
        })
    }

    /// Whether `sub` is one of Q, this field, or a quadratic subfield.
    pub fn has_subfield(&self, sub: &NumberField) -> bool {
        self.subfield_data(sub).is_ok()
    }

    /// Power-basis monomial of `sub`'s generator and its scale.
    fn subfield_data(&self, sub: &NumberField) -> Result<Option<(usize, BigInt)>> {
        match (self.0.kind, sub.0.kind) {
            (_, FieldKind::Rational) => Ok(None),
            (a, b) if a == b => Ok(Some((usize::MAX, BigInt::one()))),
            (FieldKind::Biquadratic(..), FieldKind::Quadratic(d)) => self
                .subfield_mask(d)
                .map(Some)
                .ok_or_else(|| Error::NotSubfield(format!("{} in {}", sub, self))),
            _ => Err(Error::NotSubfield(format!("{} in {}", sub, self))),
        }
    }

    /// `Gal(self / sub)` as a list of automorphisms (identity first).
    pub fn galois_group_over(&self, sub: &NumberField) -> Result<Vec<Automorphism>> {
        let data = self.subfield_data(sub)?;
        Ok(self
            .0
            .auts
            .iter()
            .filter(|a| match &data {
                None => true,
                Some((usize::MAX, _)) => a.signs == 0,
                Some((k, _)) => (a.signs & k).count_ones() % 2 == 0,
            })
            .cloned()
            .collect())
    }

    /// `[self : sub]`.
    pub fn relative_degree(&self, sub: &NumberField) -> Result<usize> {
        self.subfield_data(sub)?;
        Ok(self.degree() / sub.degree())
    }

    /// Looks up a quadratic subfield by selector: a radicand, or (if no
    /// radicand matches) the index 1, 2, 3 in the order of
    /// [`Self::quadratic_subfields`].
    pub fn subfield_by_selector(&self, sel: i64) -> Result<NumberField> {
        let subs = self.quadratic_subfields();
        if let Some(f) = subs.iter().find(|f| f.radicands() == [sel]) {
            return Ok(f.clone());
        }
        if (1..=3).contains(&sel) && !subs.is_empty() {
            return Ok(subs[(sel - 1) as usize].clone());
        }
        Err(Error::NotSubfield(format!("selector {} in {}", sel, self)))
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::from_integral(self, vec![BigInt::zero(); self.degree()])
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    pub fn from_int(&self, v: i64) -> FieldElement {
        self.from_bigint(&BigInt::from(v))
    }

    pub fn from_bigint(&self, v: &BigInt) -> FieldElement {
        let mut c = vec![BigInt::zero(); self.degree()];
        c[0] = v.clone();
        FieldElement::from_integral(self, c)
    }

    pub fn from_rational(&self, q: &BigRational) -> FieldElement {
        let mut c = vec![BigInt::zero(); self.degree()];
        c[0] = q.numer().clone();
        FieldElement::new(self, c, q.denom().clone())
    }

    /// `ω_i`, the `i`-th integral basis element.
    pub fn basis_element(&self, i: usize) -> FieldElement {
        let mut c = vec![BigInt::zero(); self.degree()];
        c[i] = BigInt::one();
        FieldElement::from_integral(self, c)
    }

    /// Element from power-basis coordinates.
    pub fn from_power(&self, coords: &[BigRational]) -> FieldElement {
        let den = coords
            .iter()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let num: Vec<BigInt> = coords
            .iter()
            .map(|q| (q * BigRational::from_integer(den.clone())).to_integer())
            .collect();
        // integral coords = power · inv / inv_den
        let c = self.0.inv.apply(&num);
        FieldElement::new(self, c, den * &self.0.inv_den)
    }

    /// A square root of the squarefree radicand `d` of a subfield `Q(√d)`.
    pub fn sqrt_of_radicand(&self, d: i64) -> Result<FieldElement> {
        let (k, g) = self
            .subfield_mask(d)
            .ok_or_else(|| Error::NotSubfield(format!("Q(sqrt {}) in {}", d, self)))?;
        let mut p = vec![BigRational::zero(); self.degree()];
        p[k] = BigRational::new(BigInt::one(), g);
        Ok(self.from_power(&p))
    }

    fn mul_integral(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let n = self.degree();
        let mut out = vec![BigInt::zero(); n];
        for i in 0..n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[j].is_zero() {
                    continue;
                }
                let ab = &a[i] * &b[j];
                for (o, t) in out.iter_mut().zip(&self.0.table[i][j]) {
                    if !t.is_zero() {
                        *o += &ab * t;
                    }
                }
            }
        }
        out
    }

    /// Multiplication table: integral coordinates of `ω_i · ω_j`.
    pub fn mult_table(&self, i: usize, j: usize) -> &[BigInt] {
        &self.0.table[i][j]
    }

    /// Number of embeddings into C (all of them, conjugate pairs included).
    pub fn embedding_count(&self) -> usize {
        self.degree()
    }

    /// Representatives of the infinite places: each real embedding, and one
    /// embedding per complex-conjugate pair. Returns `(signs, weight)`.
    pub fn infinite_places(&self) -> Vec<(usize, u32)> {
        let n = self.degree();
        if self.is_totally_real() {
            (0..n).map(|s| (s, 1)).collect()
        } else {
            let c = self.0.conj_mask;
            (0..n).filter(|&s| s < s ^ c).map(|s| (s, 2)).collect()
        }
    }
}

/// Exact element of a number field: integral-basis coordinates over a
/// positive common denominator.
#[derive(Clone)]
pub struct FieldElement {
    field: NumberField,
    num: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.num == other.num && self.den == other.den
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.num.iter().map(|c| c.to_string()).collect();
        if self.den.is_one() {
            write!(f, "[{}]", parts.join(", "))
        } else {
            write!(f, "[{}]/{}", parts.join(", "), self.den)
        }
    }
}

impl FieldElement {
    pub fn new(field: &NumberField, num: Vec<BigInt>, den: BigInt) -> Self {
        assert_eq!(num.len(), field.degree());
        assert!(!den.is_zero(), "zero denominator");
        let mut e = FieldElement {
            field: field.clone(),
            num,
            den,
        };
        e.normalize();
        e
    }

    pub fn from_integral(field: &NumberField, num: Vec<BigInt>) -> Self {
        Self::new(field, num, BigInt::one())
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -std::mem::take(&mut self.den);
            for c in &mut self.num {
                *c = -std::mem::take(c);
            }
        }
        let g = self.num.iter().fold(self.den.clone(), |acc, c| acc.gcd(c));
        if !g.is_one() && !g.is_zero() {
            for c in &mut self.num {
                *c /= &g;
            }
            self.den /= &g;
        }
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    /// Numerators on the integral basis.
    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// Integral-basis coordinates as rationals.
    pub fn coordinates(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .map(|c| BigRational::new(c.clone(), self.den.clone()))
            .collect()
    }

    /// Power-basis coordinates.
    pub fn power_coordinates(&self) -> Vec<BigRational> {
        let f = &self.field.0;
        let p = f.basis.apply(&self.num);
        let d = &self.den * &f.basis_den;
        p.into_iter()
            .map(|x| BigRational::new(x, d.clone()))
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    /// The rational value when the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num[1..].iter().all(Zero::is_zero) {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    fn check_field(&self, other: &FieldElement) {
        assert!(
            self.field == other.field,
            "elements of different fields: {} and {}",
            self.field,
            other.field
        );
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        self.check_field(other);
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| a * &other.den + b * &self.den)
            .collect();
        FieldElement::new(&self.field, num, &self.den * &other.den)
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &FieldElement) -> FieldElement {
        self.check_field(other);
        let num = self.field.mul_integral(&self.num, &other.num);
        FieldElement::new(&self.field, num, &self.den * &other.den)
    }

    pub fn scale(&self, k: &BigRational) -> FieldElement {
        let num = self.num.iter().map(|c| c * k.numer()).collect();
        FieldElement::new(&self.field, num, &self.den * k.denom())
    }

    pub fn scale_int(&self, k: &BigInt) -> FieldElement {
        self.scale(&BigRational::from_integer(k.clone()))
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        let mut result = self.field.one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Integer power, negative exponents allowed for nonzero elements.
    pub fn powi(&self, e: &BigInt) -> Result<FieldElement> {
        let mag = e
            .abs()
            .to_u64()
            .ok_or_else(|| Error::Internal("exponent too large".into()))?;
        if e.is_negative() {
            Ok(self.inverse()?.pow(mag))
        } else {
            Ok(self.pow(mag))
        }
    }

    pub fn apply(&self, sigma: &Automorphism) -> FieldElement {
        if sigma.is_identity() {
            return self.clone();
        }
        FieldElement::new(&self.field, sigma.matrix.apply(&self.num), self.den.clone())
    }

    /// Product of the images under all non-identity automorphisms.
    pub fn conjugate_product(&self) -> FieldElement {
        self.field.automorphisms()[1..]
            .iter()
            .fold(self.field.one(), |acc, s| acc.mul(&self.apply(s)))
    }

    /// Absolute norm.
    pub fn norm(&self) -> BigRational {
        let p = self.mul(&self.conjugate_product());
        p.as_rational().expect("norm lies in Q")
    }

    pub fn trace(&self) -> BigRational {
        let s = self
            .field
            .automorphisms()
            .iter()
            .fold(self.field.zero(), |acc, a| acc.add(&self.apply(a)));
        s.as_rational().expect("trace lies in Q")
    }

    pub fn inverse(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::Precondition("inverse of zero".into()));
        }
        let c = self.conjugate_product();
        let n = self.mul(&c).as_rational().expect("norm lies in Q");
        Ok(c.scale(&n.recip()))
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(&other.inverse()?))
    }

    /// Whether the element is fixed by every listed automorphism.
    pub fn is_fixed_by(&self, auts: &[Automorphism]) -> bool {
        auts.iter().all(|a| self.apply(a) == *self)
    }

    /// `log |σ(x)|` at the embedding with the given sign mask, computed in
    /// fixed point with enough precision to avoid cancellation.
    pub fn log_abs_at(&self, signs: usize) -> f64 {
        assert!(!self.is_zero(), "log of zero");
        let f = &self.field.0;
        let n = f.degree;
        let pnum = f.basis.apply(&self.num);
        let pden = &self.den * &f.basis_den;
        let mut prec: u64 = 96;
        loop {
            let mut re = BigInt::zero();
            let mut im = BigInt::zero();
            let mut err = BigInt::one();
            for k in 0..n {
                let c = &pnum[k];
                if c.is_zero() {
                    continue;
                }
                let r = (f.rads[k].abs() << (2 * prec)).sqrt();
                let neg = (0..f.radicands.len())
                    .filter(|&i| k >> i & 1 == 1 && f.radicands[i] < 0)
                    .count();
                let flip = (k & signs).count_ones() % 2 == 1;
                let mut term = c * &r;
                if flip {
                    term = -term;
                }
                match neg % 4 {
                    0 => re += term,
                    1 => im += term,
                    2 => re -= term,
                    _ => im -= term,
                }
                err += c.abs();
            }
            let mag = re.abs() + im.abs();
            if mag > (err << 24) {
                let sq = &re * &re + &im * &im;
                return 0.5 * log_big(&sq)
                    - (prec as f64) * std::f64::consts::LN_2
                    - log_big(&pden);
            }
            prec *= 2;
            assert!(
                prec < 1 << 20,
                "precision escalation failed for a nonzero element"
            );
        }
    }

    /// Logarithmic embedding over the infinite places (weights included).
    pub fn log_vector(&self) -> Vec<f64> {
        self.field
            .infinite_places()
            .iter()
            .map(|&(s, w)| w as f64 * self.log_abs_at(s))
            .collect()
    }

    /// Exact `T2(x) = Σ |σ(x)|²`.
    pub fn t2(&self) -> BigRational {
        let g = self.field.t2_gram();
        let v = g.apply(&self.num);
        let s: BigInt = v.iter().zip(&self.num).map(|(a, b)| a * b).sum();
        BigRational::new(s, &self.den * &self.den)
    }
}

/// Natural log of |v| for arbitrarily large integers.
pub fn log_big(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        v.to_f64().expect("finite").abs().ln()
    } else {
        let shift = bits - 64;
        let top = (v.abs() >> shift).to_f64().expect("finite");
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Image of an element of `sub` in `field`.
pub fn embed_element(
    sub: &NumberField,
    field: &NumberField,
    x: &FieldElement,
) -> Result<FieldElement> {
    if x.field() != sub {
        return Err(Error::FieldMismatch(format!(
            "element of {} given for {}",
            x.field(),
            sub
        )));
    }
    let data = field.subfield_data(sub)?;
    match data {
        Some((usize::MAX, _)) => Ok(x.clone()),
        None => Ok(field.from_rational(&x.as_rational().expect("element of Q"))),
        Some((k, g)) => {
            let p = x.power_coordinates();
            let mut out = vec![BigRational::zero(); field.degree()];
            out[0] = p[0].clone();
            out[k] = &p[1] / BigRational::from_integer(g);
            Ok(field.from_power(&out))
        }
    }
}

/// Expresses an element of `field` lying in `sub` on `sub`'s basis.
pub fn restrict_element(
    field: &NumberField,
    sub: &NumberField,
    x: &FieldElement,
) -> Result<FieldElement> {
    let data = field.subfield_data(sub)?;
    match data {
        Some((usize::MAX, _)) => Ok(x.clone()),
        None => x
            .as_rational()
            .map(|q| sub.from_rational(&q))
            .ok_or_else(|| Error::NotSubfield("element is not rational".into())),
        Some((k, g)) => {
            let p = x.power_coordinates();
            if p.iter()
                .enumerate()
                .any(|(i, c)| i != 0 && i != k && !c.is_zero())
            {
                return Err(Error::NotSubfield(format!(
                    "element does not lie in {}",
                    sub
                )));
            }
            let q = vec![p[0].clone(), &p[k] * BigRational::from_integer(g)];
            Ok(sub.from_power(&q))
        }
    }
}

/// `∏_{σ ∈ Gal(field/sub)} σ(x)`, expressed in `sub`.
pub fn relative_norm_element(
    field: &NumberField,
    sub: &NumberField,
    x: &FieldElement,
) -> Result<FieldElement> {
    let gal = field.galois_group_over(sub)?;
    let prod = gal.iter().fold(field.one(), |acc, s| acc.mul(&x.apply(s)));
    restrict_element(field, sub, &prod)
}

/// All primes up to `bound` (inclusive).
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return vec![];
    }
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (2..=n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
}

/// Distinct prime factors of a nonzero integer by trial division.
pub fn prime_factors(n: &BigInt) -> Vec<BigInt> {
    small_primes_dividing(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(d: i64) -> NumberField {
        NumberField::quadratic(d).unwrap()
    }

    fn el(f: &NumberField, c: &[i64]) -> FieldElement {
        FieldElement::from_integral(f, c.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn quadratic_fields() {
        let k = q(-5);
        assert_eq!(*k.discriminant(), BigInt::from(-20));
        assert_eq!(k.signature(), (0, 1));
        // basis {1, √-5}
        assert_eq!(
            k.integral_basis(),
            &IntMatrix::from_i64(&[&[1, 0], &[0, 1]])
        );
        let sigma = k.automorphism(1);
        let root = k.sqrt_of_radicand(-5).unwrap();
        assert_eq!(root.apply(sigma), root.neg());

        let k = q(5);
        assert_eq!(*k.discriminant(), BigInt::from(5));
        assert_eq!(k.signature(), (2, 0));
        // basis {1, (1+√5)/2}
        assert_eq!(
            k.integral_basis(),
            &IntMatrix::from_i64(&[&[2, 0], &[1, 1]])
        );
        assert_eq!(k.basis_denominator(), &BigInt::from(2));

        assert_eq!(
            NumberField::quadratic(12).unwrap_err(),
            Error::NotSquarefree(12)
        );
    }

    /// Classical discriminant formula, evaluated independently.
    fn classical_disc(d: i64) -> i64 {
        if d % 4 == 1 || d % 4 == -3 {
            d
        } else {
            4 * d
        }
    }

    #[test]
    fn biquadratic_fields() {
        let k = NumberField::biquadratic(-1, 2).unwrap();
        assert_eq!(*k.discriminant(), BigInt::from(256));
        let subs: Vec<i64> = k
            .quadratic_subfields()
            .iter()
            .map(|f| f.discriminant().to_i64().unwrap())
            .collect();
        assert_eq!(subs, vec![-4, 8, -8]);

        let k = NumberField::biquadratic(-1, 5).unwrap();
        assert_eq!(*k.discriminant(), BigInt::from(400));
        let subs: Vec<i64> = k
            .quadratic_subfields()
            .iter()
            .map(|f| f.discriminant().to_i64().unwrap())
            .collect();
        assert_eq!(subs, vec![-4, 5, -20]);

        assert!(NumberField::biquadratic(2, 8).is_err());
        assert!(NumberField::biquadratic(3, 3).is_err());
    }

    #[test]
    fn biquadratic_discriminant_rule_on_many_fields() {
        let ms = [-7, -5, -3, -2, -1, 2, 3, 5, 6, 7, 10, 13, 15, 17, 21, 33];
        for (i, &a) in ms.iter().enumerate() {
            for &b in &ms[i + 1..] {
                let Ok(k) = NumberField::biquadratic(a, b) else {
                    continue;
                };
                let prod: i64 = k
                    .quadratic_subfields()
                    .iter()
                    .map(|f| classical_disc(f.radicands()[0]))
                    .product();
                assert_eq!(*k.discriminant(), BigInt::from(prod), "{}", k);
                assert_eq!(k.automorphisms().len(), 4);
            }
        }
    }

    #[test]
    fn galois_groups() {
        let z8 = NumberField::biquadratic(-1, 2).unwrap();
        assert_eq!(z8.galois_group_over(&q(2)).unwrap().len(), 2);
        assert_eq!(z8.galois_group_over(&z8).unwrap().len(), 1);
        assert_eq!(
            z8.galois_group_over(&NumberField::rational())
                .unwrap()
                .len(),
            4
        );
        assert!(z8.galois_group_over(&q(3)).is_err());
        let k = q(-5);
        let g = k.galois_group_over(&NumberField::rational()).unwrap();
        assert_eq!(g.len(), 2);
        // V4: every non-identity element has order 2 and the table closes
        for a in z8.automorphisms() {
            for b in z8.automorphisms() {
                let ab = a.matrix().mul(b.matrix());
                assert_eq!(ab, *z8.automorphism(a.signs() ^ b.signs()).matrix());
            }
            assert_eq!(a.matrix().mul(a.matrix()), IntMatrix::identity(4));
        }
    }

    #[test]
    fn embeddings() {
        let f = q(5);
        let k = NumberField::biquadratic(-1, 5).unwrap();
        let one = embed_element(&f, &k, &f.one()).unwrap();
        assert!(one.is_one());
        let r5 = f.sqrt_of_radicand(5).unwrap();
        let img = embed_element(&f, &k, &r5).unwrap();
        assert_eq!(img.mul(&img), k.from_int(5));
        assert!(embed_element(&q(3), &k, &q(3).one()).is_err());
        assert_eq!(restrict_element(&k, &f, &img).unwrap(), r5);
    }

    #[test]
    fn relative_norms() {
        let k = q(-5);
        let qq = NumberField::rational();
        let x = k.one().add(&k.sqrt_of_radicand(-5).unwrap());
        assert_eq!(relative_norm_element(&k, &qq, &x).unwrap(), qq.from_int(6));
        assert_eq!(relative_norm_element(&k, &k, &x).unwrap(), x);
        let big = NumberField::biquadratic(-1, 5).unwrap();
        let i = big.sqrt_of_radicand(-1).unwrap();
        assert!(relative_norm_element(&big, &q(5), &i).unwrap().is_one());
    }

    #[test]
    fn logs_of_small_conjugates() {
        let k = q(2);
        let e = el(&k, &[1, 1]); // 1 + √2
        let big = e.pow(200);
        let inv = big.inverse().unwrap();
        let l = inv.log_abs_at(0);
        let expected = -200.0 * (1.0 + 2f64.sqrt()).ln();
        assert!((l - expected).abs() < 1e-9);
        let l1 = big.log_abs_at(1);
        assert!((l1 - expected).abs() < 1e-9);
    }

    fn field_strategy() -> impl Strategy<Value = NumberField> {
        prop_oneof![
            Just(NumberField::biquadratic(-1, 5).unwrap()),
            Just(NumberField::biquadratic(2, 3).unwrap()),
            Just(NumberField::biquadratic(-3, 5).unwrap()),
            Just(NumberField::biquadratic(-2, -7).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn norms_multiplicative_and_transitive(
            f in field_strategy(),
            a in proptest::collection::vec(-20i64..20, 4),
            b in proptest::collection::vec(-20i64..20, 4),
        ) {
            let x = el(&f, &a);
            let y = el(&f, &b);
            let qq = NumberField::rational();
            prop_assert_eq!(x.mul(&y).norm(), x.norm() * y.norm());
            for sub in f.quadratic_subfields() {
                let nx = relative_norm_element(&f, &sub, &x).unwrap();
                let ny = relative_norm_element(&f, &sub, &y).unwrap();
                let nxy = relative_norm_element(&f, &sub, &x.mul(&y)).unwrap();
                prop_assert_eq!(nxy, nx.mul(&ny));
                prop_assert_eq!(relative_norm_element(&sub, &qq, &nx).unwrap().as_rational().unwrap(), x.norm());
            }
        }

        #[test]
        fn inverse_round_trip(f in field_strategy(), a in proptest::collection::vec(-9i64..9, 4)) {
            let x = el(&f, &a);
            prop_assume!(!x.is_zero());
            prop_assert!(x.mul(&x.inverse().unwrap()).is_one());
        }
    }
}
