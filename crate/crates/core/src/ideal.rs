//! Ideals of maximal orders, stored as row Hermite normal forms over the
//! integral basis.

use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::abelian::{hnf_basis, hnf_reduce, lattice_kernel, IntMatrix};
use crate::error::{Error, Result};
use crate::forms::{represents_unit_indefinite, Form};
use crate::lattice::{box_vectors, congruence, enumerate, lll, Enumeration};
use crate::numfield::{embed_element, Automorphism, FieldElement, FieldKind, NumberField};

/// Integral ideal of a maximal order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ideal {
    field: NumberField,
    hnf: IntMatrix,
    norm: BigInt,
}

impl fmt::Debug for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.hnf)
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.hnf)
    }
}

fn check_same(a: &NumberField, b: &NumberField) -> Result<()> {
    if a != b {
        return Err(Error::FieldMismatch(format!("{} vs {}", a, b)));
    }
    Ok(())
}

impl Ideal {
    fn from_lattice(field: &NumberField, rows: &IntMatrix) -> Result<Ideal> {
        let n = field.degree();
        let h = hnf_basis(rows);
        if h.rows() != n {
            return Err(Error::ZeroIdeal);
        }
        let norm = (0..n).fold(BigInt::one(), |acc, i| acc * &h[(i, i)]);
        Ok(Ideal {
            field: field.clone(),
            hnf: h,
            norm,
        })
    }

    /// The ideal generated by integral elements.
    pub fn from_generators(field: &NumberField, gens: &[FieldElement]) -> Result<Ideal> {
        let n = field.degree();
        let mut rows = Vec::new();
        for g in gens {
            check_same(field, g.field())?;
            if !g.is_integral() {
                return Err(Error::Precondition(format!(
                    "generator {} is not integral",
                    g
                )));
            }
            if g.is_zero() {
                continue;
            }
            for j in 0..n {
                rows.push(g.mul(&field.basis_element(j)).numerators().to_vec());
            }
        }
        if rows.is_empty() {
            return Err(Error::ZeroIdeal);
        }
        Self::from_lattice(field, &IntMatrix::from_rows(rows, n))
    }

    pub fn principal(x: &FieldElement) -> Result<Ideal> {
        Self::from_generators(x.field(), std::slice::from_ref(x))
    }

    pub fn unit(field: &NumberField) -> Ideal {
        Self::from_int(field, &BigInt::one())
    }

    pub fn from_int(field: &NumberField, k: &BigInt) -> Ideal {
        let n = field.degree();
        let k = k.abs();
        assert!(!k.is_zero(), "zero ideal");
        let hnf = IntMatrix::diagonal(&vec![k.clone(); n]);
        Ideal {
            field: field.clone(),
            hnf,
            norm: num_traits::pow(k, n),
        }
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn hnf(&self) -> &IntMatrix {
        &self.hnf
    }

    pub fn norm(&self) -> &BigInt {
        &self.norm
    }

    pub fn is_unit(&self) -> bool {
        self.norm.is_one()
    }

    /// Z-basis as field elements.
    pub fn basis_elements(&self) -> Vec<FieldElement> {
        (0..self.hnf.rows())
            .map(|i| FieldElement::from_integral(&self.field, self.hnf.row_vec(i)))
            .collect()
    }

    /// Smallest positive integer in the ideal.
    pub fn minimum(&self) -> BigInt {
        self.hnf[(0, 0)].clone()
    }

    pub fn mul(&self, other: &Ideal) -> Ideal {
        check_same(&self.field, &other.field).expect("ideal product across fields");
        let n = self.field.degree();
        let a = self.basis_elements();
        let b = other.basis_elements();
        let mut rows = Vec::with_capacity(n * n + n);
        for x in &a {
            for y in &b {
                rows.push(x.mul(y).numerators().to_vec());
            }
        }
        Self::from_lattice(&self.field, &IntMatrix::from_rows(rows, n))
            .expect("product of nonzero ideals")
    }

    pub fn add(&self, other: &Ideal) -> Ideal {
        check_same(&self.field, &other.field).expect("ideal sum across fields");
        Self::from_lattice(&self.field, &self.hnf.vstack(&other.hnf))
            .expect("sum of nonzero ideals")
    }

    pub fn intersect(&self, other: &Ideal) -> Ideal {
        check_same(&self.field, &other.field).expect("ideal intersection across fields");
        let n = self.field.degree();
        let stacked = self.hnf.vstack(&other.hnf);
        let k = lattice_kernel(&stacked, &vec![BigInt::zero(); n]);
        let left = k.select_cols(&(0..n).collect::<Vec<_>>());
        Self::from_lattice(&self.field, &left.mul(&self.hnf))
            .expect("intersection of nonzero ideals")
    }

    pub fn pow(&self, k: u32) -> Ideal {
        let mut out = Ideal::unit(&self.field);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    pub fn contains_vector(&self, v: &[BigInt]) -> bool {
        let (rem, _) = hnf_reduce(v, &self.hnf);
        rem.iter().all(Zero::is_zero)
    }

    pub fn contains_element(&self, x: &FieldElement) -> bool {
        x.is_integral() && self.contains_vector(x.numerators())
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Ideal) -> bool {
        (0..other.hnf.rows()).all(|i| self.contains_vector(other.hnf.row(i)))
    }

    pub fn apply(&self, sigma: &Automorphism) -> Ideal {
        if sigma.is_identity() {
            return self.clone();
        }
        let rows = self.hnf.mul(sigma.matrix());
        Self::from_lattice(&self.field, &rows).expect("image of a nonzero ideal")
    }

    /// Product of the images under the non-identity automorphisms, so that
    /// `self · conjugate_product = (norm)`.
    pub fn conjugate_product(&self) -> Ideal {
        self.field.automorphisms()[1..]
            .iter()
            .fold(Ideal::unit(&self.field), |acc, s| acc.mul(&self.apply(s)))
    }

    pub fn is_invariant_under(&self, auts: &[Automorphism]) -> bool {
        auts.iter().all(|s| self.apply(s) == *self)
    }

    /// gcd of the HNF entries: the largest integer `k` with `self ⊆ (k)`.
    pub fn content(&self) -> BigInt {
        (0..self.hnf.rows())
            .flat_map(|i| self.hnf.row(i).to_vec())
            .fold(BigInt::zero(), |acc, x| acc.gcd(&x))
    }

    /// `self / k` when every entry is divisible by `k`.
    pub fn div_int(&self, k: &BigInt) -> Option<Ideal> {
        let n = self.field.degree();
        let mut h = self.hnf.clone();
        for i in 0..n {
            for j in 0..n {
                let (q, r) = h[(i, j)].div_rem(k);
                if !r.is_zero() {
                    return None;
                }
                h[(i, j)] = q;
            }
        }
        Self::from_lattice(&self.field, &h).ok()
    }

    /// Elements of small T2 norm: combinations with coefficients in
    /// `[-k, k]` of an LLL-reduced basis, one of each `±` pair, sorted.
    pub fn short_elements(&self, k: i64) -> Vec<FieldElement> {
        let (basis, _) = self.reduced_basis();
        let n = self.field.degree();
        let mut out: Vec<(BigInt, Vec<i64>, FieldElement)> = box_vectors(n, k)
            .into_iter()
            .map(|v| {
                let vb: Vec<BigInt> = v.iter().map(|&t| BigInt::from(t)).collect();
                let x = FieldElement::from_integral(&self.field, basis.apply(&vb));
                let t = x.t2().to_integer();
                (t, v, x)
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        out.into_iter().map(|t| t.2).collect()
    }

    /// LLL-reduced basis (rows in integral coordinates) and its Gram matrix.
    pub fn reduced_basis(&self) -> (IntMatrix, IntMatrix) {
        let g = congruence(&self.hnf, self.field.t2_gram());
        let u = lll(&g);
        (u.mul(&self.hnf), congruence(&u, &g))
    }
}

/// Fractional ideal `num / den`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FracIdeal {
    num: Ideal,
    den: BigInt,
}

impl FracIdeal {
    pub fn new(num: Ideal, den: BigInt) -> FracIdeal {
        assert!(den.is_positive(), "denominator must be positive");
        let g = num.content().gcd(&den);
        if g.is_one() {
            return FracIdeal { num, den };
        }
        let num = num.div_int(&g).expect("content divides entries");
        FracIdeal { num, den: den / g }
    }

    pub fn integral(a: &Ideal) -> FracIdeal {
        FracIdeal {
            num: a.clone(),
            den: BigInt::one(),
        }
    }

    pub fn principal(x: &FieldElement) -> Result<FracIdeal> {
        let num = FieldElement::from_integral(x.field(), x.numerators().to_vec());
        Ok(FracIdeal::new(
            Ideal::principal(&num)?,
            x.denominator().clone(),
        ))
    }

    pub fn numerator(&self) -> &Ideal {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn norm(&self) -> BigRational {
        let n = self.num.field().degree();
        BigRational::new(
            self.num.norm().clone(),
            num_traits::pow(self.den.clone(), n),
        )
    }

    pub fn mul(&self, other: &FracIdeal) -> FracIdeal {
        FracIdeal::new(self.num.mul(&other.num), &self.den * &other.den)
    }

    pub fn inverse(&self) -> FracIdeal {
        // num^{-1} = conj(num) / N(num)
        let c = self.num.conjugate_product();
        let scaled = c.mul(&Ideal::from_int(self.num.field(), &self.den));
        FracIdeal::new(scaled, self.num.norm().clone())
    }

    pub fn pow(&self, e: i64) -> FracIdeal {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let k = e.unsigned_abs() as u32;
        FracIdeal::new(
            base.num.pow(k),
            num_traits::pow(base.den.clone(), k as usize),
        )
    }

    pub fn apply(&self, sigma: &Automorphism) -> FracIdeal {
        FracIdeal {
            num: self.num.apply(sigma),
            den: self.den.clone(),
        }
    }
}

/// A prime ideal with its absolute ramification index and residue degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimeIdeal {
    ideal: Ideal,
    p: u64,
    e: u32,
    f: u32,
    conj: Arc<Ideal>,
}

impl PrimeIdeal {
    fn new(ideal: Ideal, p: u64, e: u32, f: u32) -> Self {
        let conj = Arc::new(ideal.conjugate_product());
        PrimeIdeal {
            ideal,
            p,
            e,
            f,
            conj,
        }
    }

    pub fn ideal(&self) -> &Ideal {
        &self.ideal
    }

    pub fn field(&self) -> &NumberField {
        self.ideal.field()
    }

    /// Rational prime below.
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn norm(&self) -> &BigInt {
        self.ideal.norm()
    }

    /// `a · self⁻¹` when it is integral.
    fn divide(&self, a: &Ideal) -> Option<Ideal> {
        a.mul(&self.conj).div_int(self.ideal.norm())
    }

    pub fn apply(&self, sigma: &Automorphism) -> PrimeIdeal {
        let img = self.ideal.apply(sigma);
        primes_above(self.field(), self.p)
            .into_iter()
            .find(|q| q.ideal == img)
            .expect("conjugate of a prime is a prime above the same p")
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P({}; e={}, f={}; {})",
            self.p, self.e, self.f, self.ideal
        )
    }
}

fn mod_pow(b: u64, e: u64, m: u64) -> u64 {
    let mut r = 1u128;
    let mut b = (b % m) as u128;
    let mut e = e;
    let m = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r as u64
}

/// Square root of `a` modulo an odd prime, when one exists.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if mod_pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    // Tonelli–Shanks
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while mod_pow(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow(z, q, p);
    let mut t = mod_pow(a, q, p);
    let mut r = mod_pow(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = (tt as u128 * tt as u128 % p as u128) as u64;
            i += 1;
        }
        let b = mod_pow(c, 1 << (m - i - 1), p);
        m = i;
        c = (b as u128 * b as u128 % p as u128) as u64;
        t = (t as u128 * c as u128 % p as u128) as u64;
        r = (r as u128 * b as u128 % p as u128) as u64;
    }
    Some(r)
}

fn prime_cache() -> &'static Mutex<HashMap<(FieldKind, u64), Vec<PrimeIdeal>>> {
    static CACHE: OnceLock<Mutex<HashMap<(FieldKind, u64), Vec<PrimeIdeal>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// All primes of `field` above the rational prime `p`, in a fixed order.
pub fn primes_above(field: &NumberField, p: u64) -> Vec<PrimeIdeal> {
    let key = (field.kind(), p);
    if let Some(v) = prime_cache().lock().expect("prime cache").get(&key) {
        return v.clone();
    }
    let primes = compute_primes_above(field, p);
    prime_cache()
        .lock()
        .expect("prime cache")
        .entry(key)
        .or_insert(primes)
        .clone()
}

fn compute_primes_above(field: &NumberField, p: u64) -> Vec<PrimeIdeal> {
    let pb = BigInt::from(p);
    let n = field.degree();
    let mut out = match field.kind() {
        FieldKind::Rational => vec![PrimeIdeal::new(Ideal::from_int(field, &pb), p, 1, 1)],
        FieldKind::Quadratic(_) => {
            let t = field.mult_table(1, 1);
            // ω² = t0 + t1 ω
            let (t0, t1) = (t[0].clone(), t[1].clone());
            let disc = field.discriminant();
            let pi = |r: u64| -> Ideal {
                let w = field.basis_element(1).sub(&field.from_int(r as i64));
                Ideal::from_generators(field, &[field.from_bigint(&pb), w]).expect("nonzero")
            };
            let roots: Vec<u64> = if p == 2 {
                (0..2u64)
                    .filter(|&r| {
                        let rb = BigInt::from(r);
                        (&rb * &rb - &t1 * &rb - &t0).mod_floor(&pb).is_zero()
                    })
                    .collect()
            } else {
                let dm = disc.mod_floor(&pb).to_u64().expect("residue");
                match sqrt_mod(dm, p) {
                    None => vec![],
                    Some(s) => {
                        let inv2 = p.div_ceil(2);
                        let t1m = t1.mod_floor(&pb).to_u64().expect("residue");
                        let mut rs: Vec<u64> = [s, (p - s) % p]
                            .iter()
                            .map(|&sq| ((t1m + sq) % p) as u128 * inv2 as u128 % p as u128)
                            .map(|v| v as u64)
                            .collect();
                        rs.sort();
                        rs.dedup();
                        rs
                    }
                }
            };
            if disc.is_multiple_of(&pb) {
                vec![PrimeIdeal::new(pi(roots[0]), p, 2, 1)]
            } else if roots.is_empty() {
                vec![PrimeIdeal::new(Ideal::from_int(field, &pb), p, 1, 2)]
            } else {
                roots
                    .iter()
                    .map(|&r| PrimeIdeal::new(pi(r), p, 1, 1))
                    .collect()
            }
        }
        FieldKind::Biquadratic(..) => biquadratic_primes(field, p),
    };
    out.sort_by_key(|a| a.ideal.hnf.to_rows());
    // reconstruction check
    let rebuilt = out
        .iter()
        .fold(Ideal::unit(field), |acc, q| acc.mul(&q.ideal.pow(q.e)));
    assert_eq!(
        rebuilt,
        Ideal::from_int(field, &pb),
        "prime decomposition of {} in {} does not multiply back",
        p,
        field
    );
    assert_eq!(out.iter().map(|q| (q.e * q.f) as usize).sum::<usize>(), n);
    out
}

/// Radical of `pO_K`: elements whose `p^k`-th power lies in `pO_K`.
fn p_radical(field: &NumberField, p: u64) -> Ideal {
    let n = field.degree();
    let pb = BigInt::from(p);
    let mut q = p;
    while (q as usize) < n {
        q *= p;
    }
    let reduce = |x: &FieldElement| -> FieldElement {
        let v = x.numerators().iter().map(|c| c.mod_floor(&pb)).collect();
        FieldElement::from_integral(field, v)
    };
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut result = field.one();
        let mut base = field.basis_element(i);
        let mut e = q;
        while e > 0 {
            if e & 1 == 1 {
                result = reduce(&result.mul(&base));
            }
            e >>= 1;
            if e > 0 {
                base = reduce(&base.mul(&base));
            }
        }
        rows.push(result.numerators().to_vec());
    }
    let m = IntMatrix::from_rows(rows, n);
    let k = lattice_kernel(&m, &vec![pb.clone(); n]);
    Ideal::from_lattice(field, &k).expect("radical contains p")
}

fn biquadratic_primes(field: &NumberField, p: u64) -> Vec<PrimeIdeal> {
    let n = field.degree();
    let rad = p_radical(field, p);
    let subs = field.quadratic_subfields();
    let lifted: Vec<Vec<Ideal>> = subs
        .iter()
        .map(|k| {
            primes_above(k, p)
                .iter()
                .map(|q| extend_ideal(k, field, q.ideal()).expect("subfield"))
                .collect()
        })
        .collect();
    let mut found: Vec<Ideal> = Vec::new();
    for a in &lifted[0] {
        for b in &lifted[1] {
            for c in &lifted[2] {
                let cand = rad.add(a).add(b).add(c);
                if !cand.is_unit() && !found.contains(&cand) {
                    found.push(cand);
                }
            }
        }
    }
    let g = found.len() as u32;
    found
        .into_iter()
        .map(|ideal| {
            let mut f = 0u32;
            let mut nm = ideal.norm().clone();
            let pb = BigInt::from(p);
            while nm > BigInt::one() {
                nm /= &pb;
                f += 1;
            }
            let e = n as u32 / (f * g);
            PrimeIdeal::new(ideal, p, e, f)
        })
        .collect()
}

/// Extension of an ideal of a subfield.
pub fn extend_ideal(sub: &NumberField, field: &NumberField, a: &Ideal) -> Result<Ideal> {
    check_same(sub, a.field())?;
    if sub == field {
        return Ok(a.clone());
    }
    let gens: Result<Vec<FieldElement>> = a
        .basis_elements()
        .iter()
        .map(|x| embed_element(sub, field, x))
        .collect();
    Ideal::from_generators(field, &gens?)
}

/// `a ∩ O_sub` for an ideal `a` of `field`.
pub fn contract_ideal(field: &NumberField, sub: &NumberField, a: &Ideal) -> Result<Ideal> {
    check_same(field, a.field())?;
    if sub == field {
        return Ok(a.clone());
    }
    let m = sub.degree();
    let n = field.degree();
    let rows: Result<Vec<Vec<BigInt>>> = (0..m)
        .map(|i| embed_element(sub, field, &sub.basis_element(i)).map(|e| e.numerators().to_vec()))
        .collect();
    let emb = IntMatrix::from_rows(rows?, n);
    let k = lattice_kernel(&emb.vstack(a.hnf()), &vec![BigInt::zero(); n]);
    let left = k.select_cols(&(0..m).collect::<Vec<_>>());
    Ideal::from_lattice(sub, &left)
}

/// Relative norm of an ideal, as an ideal of `sub`.
pub fn relative_ideal_norm(field: &NumberField, sub: &NumberField, a: &Ideal) -> Result<Ideal> {
    let gal = field.galois_group_over(sub)?;
    let prod = gal
        .iter()
        .fold(Ideal::unit(field), |acc, s| acc.mul(&a.apply(s)));
    contract_ideal(field, sub, &prod)
}

/// A prime of `field` above a prime of `sub`, with relative `e` and `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelativePrime {
    pub prime: PrimeIdeal,
    pub e: u32,
    pub f: u32,
}

/// Decomposition of the prime `q` of `sub` in `field`.
pub fn split_prime(
    field: &NumberField,
    sub: &NumberField,
    q: &PrimeIdeal,
) -> Result<Vec<RelativePrime>> {
    check_same(sub, q.field())?;
    field.relative_degree(sub)?;
    let ext = extend_ideal(sub, field, q.ideal())?;
    Ok(primes_above(field, q.p())
        .into_iter()
        .filter(|pr| pr.ideal().contains(&ext))
        .map(|pr| RelativePrime {
            e: pr.e() / q.e(),
            f: pr.f() / q.f(),
            prime: pr,
        })
        .collect())
}

/// Exponent of `prime` in the integral ideal `a`.
pub fn valuation(a: &Ideal, prime: &PrimeIdeal) -> u32 {
    let mut cur = a.clone();
    let mut v = 0;
    while cur.norm().is_multiple_of(prime.norm()) {
        match prime.divide(&cur) {
            Some(next) => {
                cur = next;
                v += 1;
            }
            None => break,
        }
    }
    v
}

/// Exponent of `prime` in a nonzero element.
pub fn element_valuation(x: &FieldElement, prime: &PrimeIdeal) -> Result<i64> {
    let num = FieldElement::from_integral(x.field(), x.numerators().to_vec());
    let vn = valuation(&Ideal::principal(&num)?, prime) as i64;
    let mut den = x.denominator().clone();
    let pb = BigInt::from(prime.p());
    let mut vd = 0i64;
    while den.is_multiple_of(&pb) {
        den /= &pb;
        vd += 1;
    }
    Ok(vn - vd * prime.e() as i64)
}

/// Exponent of `prime` in a fractional ideal.
pub fn frac_valuation(a: &FracIdeal, prime: &PrimeIdeal) -> i64 {
    let mut den = a.denominator().clone();
    let pb = BigInt::from(prime.p());
    let mut vd = 0i64;
    while den.is_multiple_of(&pb) {
        den /= &pb;
        vd += 1;
    }
    valuation(a.numerator(), prime) as i64 - vd * prime.e() as i64
}

/// Prime factorization of an integral ideal.
pub fn factor(a: &Ideal) -> Vec<(PrimeIdeal, u32)> {
    let mut out = Vec::new();
    for p in crate::numfield::prime_factors(a.norm()) {
        let p = p.to_u64().expect("prime factor fits in u64");
        for q in primes_above(a.field(), p) {
            let v = valuation(a, &q);
            if v > 0 {
                out.push((q, v));
            }
        }
    }
    out
}

/// A set `S` of places: every archimedean place plus the listed finite
/// primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SSet {
    field: NumberField,
    primes: Vec<PrimeIdeal>,
}

impl SSet {
    pub fn new(field: &NumberField, primes: Vec<PrimeIdeal>) -> Result<SSet> {
        let mut out: Vec<PrimeIdeal> = Vec::new();
        for p in primes {
            check_same(field, p.field())?;
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out.sort_by(|a, b| {
            a.p()
                .cmp(&b.p())
                .then_with(|| a.ideal().hnf().to_rows().cmp(&b.ideal().hnf().to_rows()))
        });
        Ok(SSet {
            field: field.clone(),
            primes: out,
        })
    }

    pub fn archimedean(field: &NumberField) -> SSet {
        SSet {
            field: field.clone(),
            primes: vec![],
        }
    }

    /// Archimedean places and every prime above the given rational primes.
    pub fn above_rational(field: &NumberField, ps: &[u64]) -> SSet {
        let primes = ps.iter().flat_map(|&p| primes_above(field, p)).collect();
        SSet::new(field, primes).expect("primes of the same field")
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn primes(&self) -> &[PrimeIdeal] {
        &self.primes
    }

    pub fn contains(&self, p: &PrimeIdeal) -> bool {
        self.primes.contains(p)
    }

    /// Rational primes below the finite part.
    pub fn rational_primes(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.primes.iter().map(|p| p.p()).collect();
        v.dedup();
        v
    }

    /// The primes of `field` above this set (which lives on a subfield).
    pub fn lift(&self, field: &NumberField) -> Result<SSet> {
        let mut out = Vec::new();
        for q in &self.primes {
            out.extend(
                split_prime(field, &self.field, q)?
                    .into_iter()
                    .map(|r| r.prime),
            );
        }
        SSet::new(field, out)
    }

    pub fn is_subset_of(&self, other: &SSet) -> bool {
        self.field == other.field && self.primes.iter().all(|p| other.contains(p))
    }
}

impl fmt::Display for SSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "oo")?;
        for p in &self.primes {
            let above = primes_above(&self.field, p.p());
            if above.len() == 1 {
                write!(f, ",{}", p.p())?;
            } else {
                let i = above.iter().position(|q| q == p).expect("prime above p") + 1;
                write!(f, ",({},{})", p.p(), i)?;
            }
        }
        Ok(())
    }
}

static NODE_BUDGET: AtomicU64 = AtomicU64::new(1 << 22);

/// Sets the base node budget of the principality search.
pub fn set_principality_budget(nodes: u64) {
    NODE_BUDGET.store(nodes.max(1), Ordering::Relaxed);
}

pub fn principality_budget() -> u64 {
    NODE_BUDGET.load(Ordering::Relaxed)
}

/// A generator of `a` if it is principal, `None` if it is not.
pub fn is_principal(a: &Ideal) -> Result<Option<FieldElement>> {
    let field = a.field();
    if a.is_unit() {
        return Ok(Some(field.one()));
    }
    let found = match field.kind() {
        FieldKind::Rational => Some(field.from_bigint(&a.hnf()[(0, 0)])),
        FieldKind::Quadratic(d) if d > 0 => principal_real_quadratic(a)?,
        _ => principal_by_enumeration(a)?,
    };
    if let Some(g) = &found {
        if Ideal::principal(g)? != *a {
            return Err(Error::Internal(format!("generator check failed for {}", a)));
        }
    }
    Ok(found)
}

fn principal_real_quadratic(a: &Ideal) -> Result<Option<FieldElement>> {
    let basis = a.basis_elements();
    let (alpha, beta) = (&basis[0], &basis[1]);
    let n = BigRational::from_integer(a.norm().clone());
    let na = alpha.norm() / &n;
    let nb = beta.norm() / &n;
    let nab = alpha.add(beta).norm() / &n;
    let mid = &nab - &na - &nb;
    if !na.is_integer() || !nb.is_integer() || !mid.is_integer() {
        return Err(Error::Internal("norm form is not integral".into()));
    }
    let f = Form {
        a: na.to_integer(),
        b: mid.to_integer(),
        c: nb.to_integer(),
    };
    if &f.discriminant() != a.field().discriminant() {
        return Err(Error::Internal(
            "norm form has the wrong discriminant".into(),
        ));
    }
    Ok(
        represents_unit_indefinite(&f)
            .map(|(x, y, _)| alpha.scale_int(&x).add(&beta.scale_int(&y))),
    )
}

/// Squared radius of a ball that must contain a generator of a principal
/// ideal of norm `norm`: after multiplying by units the log vector of a
/// generator lies within half the unit parallelepiped of the balanced point.
fn generator_radius(field: &NumberField, norm: &BigInt) -> Result<f64> {
    let n = field.degree() as f64;
    let spread = crate::units::unit_group(field)?.embedding_spread();
    let base = crate::numfield::log_big(norm) / n;
    Ok(spread
        .iter()
        .map(|s| (2.0 * (base + 0.5 * s)).exp())
        .sum::<f64>()
        * (1.0 + 1e-6)
        + 1e-6)
}

fn principal_by_enumeration(a: &Ideal) -> Result<Option<FieldElement>> {
    let field = a.field();
    let radius = generator_radius(field, a.norm())?;
    let (basis, gram) = a.reduced_basis();
    let target = BigRational::from_integer(a.norm().clone());
    let mut budget = principality_budget();
    for _ in 0..3 {
        let mut found = None;
        let res = enumerate(&gram, radius, budget, |x| {
            let xb: Vec<BigInt> = x.iter().map(|&t| BigInt::from(t)).collect();
            let el = FieldElement::from_integral(field, basis.apply(&xb));
            if el.norm().abs() == target {
                found = Some(el);
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        match res {
            Enumeration::Stopped => return Ok(found),
            Enumeration::Completed => return Ok(None),
            Enumeration::BudgetExhausted => budget = budget.saturating_mul(4),
        }
    }
    Err(Error::Undecided(budget / 4))
}
